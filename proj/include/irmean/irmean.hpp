// Umbrella header.
#pragma once

#include "irmean/types.hpp"
#include "irmean/linalg.hpp"
#include "irmean/geometry.hpp"
#include "irmean/weights.hpp"
#include "irmean/estimator.hpp"
#include "irmean/bounds.hpp"
#include "irmean/random.hpp"
#include "irmean/simulate.hpp"
#include "irmean/adaptive.hpp"
