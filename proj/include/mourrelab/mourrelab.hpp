#pragma once

#include "common.hpp"
#include "symbol.hpp"
#include "lattice.hpp"
#include "spectra.hpp"
#include "ggt.hpp"
#include "mourre.hpp"
#include "dynamics.hpp"
