#pragma once

#include "uavmeta/channel.hpp"
#include "uavmeta/config.hpp"
#include "uavmeta/configio.hpp"
#include "uavmeta/errors.hpp"
#include "uavmeta/geometry.hpp"
#include "uavmeta/moments.hpp"
#include "uavmeta/numerics.hpp"
#include "uavmeta/oba.hpp"
#include "uavmeta/output.hpp"
#include "uavmeta/rng.hpp"
#include "uavmeta/sim.hpp"
#include "uavmeta/sweep.hpp"
#include "uavmeta/version.hpp"
