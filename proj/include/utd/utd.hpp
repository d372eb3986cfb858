#pragma once

#include "error.hpp"
#include "fft.hpp"
#include "signal_model.hpp"
#include "wavelet_estimation.hpp"
#include "wiener_deconv.hpp"
#include "spectral_extrapolation.hpp"
#include "synthetic_bench.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "scan_io.hpp"
