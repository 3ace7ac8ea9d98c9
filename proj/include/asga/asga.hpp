#pragma once

#include <asga/errors.hpp>
#include <asga/problem.hpp>
#include <asga/prox.hpp>
#include <asga/root_finding.hpp>
#include <asga/scaling.hpp>
#include <asga/estimation.hpp>
#include <asga/solvers.hpp>
#include <asga/baselines.hpp>
#include <asga/runner.hpp>
#include <asga/zoo.hpp>
