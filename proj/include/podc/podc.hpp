#pragma once

#include "podc/bounds.hpp"
#include "podc/config.hpp"
#include "podc/drift_scan.hpp"
#include "podc/errors.hpp"
#include "podc/fluid.hpp"
#include "podc/generator.hpp"
#include "podc/io.hpp"
#include "podc/lyapunov.hpp"
#include "podc/per_queue.hpp"
#include "podc/regime.hpp"
#include "podc/rng.hpp"
#include "podc/simulate.hpp"
#include "podc/ssc.hpp"
#include "podc/state.hpp"
#include "podc/stationary.hpp"
#include "podc/stats.hpp"
#include "podc/taylor.hpp"
#include "podc/version.hpp"
