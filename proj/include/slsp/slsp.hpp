#pragma once

#include <slsp/errors.hpp>
#include <slsp/graph.hpp>
#include <slsp/harness.hpp>
#include <slsp/io.hpp>
#include <slsp/kernel.hpp>
#include <slsp/metrics.hpp>
#include <slsp/random.hpp>
#include <slsp/semisupervised.hpp>
#include <slsp/solver.hpp>
#include <slsp/version.hpp>
