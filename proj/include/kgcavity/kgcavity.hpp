#pragma once

#include "error.hpp"
#include "summation.hpp"
#include "config.hpp"
#include "region.hpp"
#include "bogoliubov.hpp"
#include "cache.hpp"
#include "modes.hpp"
#include "quadrature.hpp"
#include "vacuum.hpp"
#include "causality.hpp"
#include "quasilocal.hpp"
#include "fock_oracle.hpp"
#include "io.hpp"
