#pragma once

#include "netmed/dimension.hpp"
#include "netmed/error.hpp"
#include "netmed/io.hpp"
#include "netmed/lsm.hpp"
#include "netmed/mds.hpp"
#include "netmed/mediation.hpp"
#include "netmed/netcore.hpp"
#include "netmed/random.hpp"
#include "netmed/sampler.hpp"
#include "netmed/simstudy.hpp"
#include "netmed/summary.hpp"
#include "netmed/transforms.hpp"
