#pragma once

#define CTRAP_VERSION "0.1.0"

#include "ctrap/convergence.hpp"
#include "ctrap/error.hpp"
#include "ctrap/io.hpp"
#include "ctrap/kernel.hpp"
#include "ctrap/lattice.hpp"
#include "ctrap/multiindex.hpp"
#include "ctrap/quadrature.hpp"
#include "ctrap/special.hpp"
#include "ctrap/sphere.hpp"
#include "ctrap/verify.hpp"
#include "ctrap/weights.hpp"
