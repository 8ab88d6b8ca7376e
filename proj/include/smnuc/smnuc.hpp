#pragma once

#include "smnuc/baselines.hpp"
#include "smnuc/capacity.hpp"
#include "smnuc/channel.hpp"
#include "smnuc/constellation.hpp"
#include "smnuc/detection.hpp"
#include "smnuc/errors.hpp"
#include "smnuc/fec.hpp"
#include "smnuc/harness.hpp"
#include "smnuc/io.hpp"
#include "smnuc/link.hpp"
#include "smnuc/optimizer.hpp"
#include "smnuc/parallel.hpp"
#include "smnuc/pso.hpp"
#include "smnuc/rng.hpp"
