#pragma once

// Umbrella header.

#include "aniso/errors.hpp"
#include "aniso/quadrature.hpp"
#include "aniso/problem.hpp"
#include "aniso/spectral.hpp"
#include "aniso/grid.hpp"
#include "aniso/expansion.hpp"
#include "aniso/fdsolver.hpp"
#include "aniso/montecarlo.hpp"
#include "aniso/validation.hpp"
