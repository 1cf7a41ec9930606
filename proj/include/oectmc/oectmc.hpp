#pragma once

#include "oectmc/binding.hpp"
#include "oectmc/calibration.hpp"
#include "oectmc/config.hpp"
#include "oectmc/constants.hpp"
#include "oectmc/detection.hpp"
#include "oectmc/device.hpp"
#include "oectmc/experiments.hpp"
#include "oectmc/fft.hpp"
#include "oectmc/framing.hpp"
#include "oectmc/link.hpp"
#include "oectmc/parallel.hpp"
#include "oectmc/results.hpp"
#include "oectmc/rng.hpp"
#include "oectmc/sampling.hpp"
#include "oectmc/scenario_io.hpp"
#include "oectmc/sweep.hpp"
#include "oectmc/transport.hpp"
