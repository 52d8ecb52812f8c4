#pragma once

#include "accelwave/amplitude.hpp"
#include "accelwave/characteristics.hpp"
#include "accelwave/config.hpp"
#include "accelwave/constitutive.hpp"
#include "accelwave/csv.hpp"
#include "accelwave/errors.hpp"
#include "accelwave/extended_real.hpp"
#include "accelwave/scenario.hpp"
#include "accelwave/wavefront_sim.hpp"
