#pragma once

#include "mlc/config.hpp"
#include "mlc/error.hpp"
#include "mlc/features.hpp"
#include "mlc/host.hpp"
#include "mlc/io.hpp"
#include "mlc/metrics.hpp"
#include "mlc/pipeline.hpp"
#include "mlc/selection.hpp"
#include "mlc/signal.hpp"
#include "mlc/synth.hpp"
#include "mlc/tree.hpp"
#include "mlc/virtual_sensor.hpp"
