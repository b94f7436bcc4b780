#pragma once
// Umbrella header.

#include <flowforce/dj_problem.hpp>
#include <flowforce/dj_solver.hpp>
#include <flowforce/errors.hpp>
#include <flowforce/flow_force.hpp>
#include <flowforce/format.hpp>
#include <flowforce/grid.hpp>
#include <flowforce/hodograph.hpp>
#include <flowforce/io.hpp>
#include <flowforce/region.hpp>
#include <flowforce/svg.hpp>
#include <flowforce/theorem_checks.hpp>
