#pragma once

#include "iecc/bench.hpp"
#include "iecc/clustering.hpp"
#include "iecc/codec.hpp"
#include "iecc/errors.hpp"
#include "iecc/iec.hpp"
#include "iecc/metrics.hpp"
#include "iecc/raster.hpp"
#include "iecc/rng.hpp"
#include "iecc/stats.hpp"
