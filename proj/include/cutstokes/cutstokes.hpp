#pragma once

#include "geometry.hpp"
#include "quadrature.hpp"
#include "fe.hpp"
#include "dofs.hpp"
#include "discretization.hpp"
#include "assembly.hpp"
#include "solver.hpp"
#include "manufactured.hpp"
#include "harness.hpp"
#include "vtk.hpp"
#include "freefall.hpp"
