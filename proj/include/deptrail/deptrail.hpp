#pragma once

#include "deptrail/crc.hpp"
#include "deptrail/depth_io.hpp"
#include "deptrail/errors.hpp"
#include "deptrail/evaluation.hpp"
#include "deptrail/glac.hpp"
#include "deptrail/grid.hpp"
#include "deptrail/mtm.hpp"
#include "deptrail/parallel.hpp"
#include "deptrail/representation.hpp"
#include "deptrail/run_config.hpp"
#include "deptrail/synth.hpp"
