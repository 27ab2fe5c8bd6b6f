#pragma once

#include "rimnoise/config.hpp"
#include "rimnoise/correlation_tensor.hpp"
#include "rimnoise/cumulants.hpp"
#include "rimnoise/engine.hpp"
#include "rimnoise/errors.hpp"
#include "rimnoise/estimation.hpp"
#include "rimnoise/io.hpp"
#include "rimnoise/noise.hpp"
#include "rimnoise/oracles.hpp"
#include "rimnoise/partitions.hpp"
#include "rimnoise/planning.hpp"
#include "rimnoise/recipes.hpp"
#include "rimnoise/rim.hpp"
#include "rimnoise/rng.hpp"
#include "rimnoise/spectra.hpp"
