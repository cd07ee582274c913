#pragma once

#include "prforge/benchmark.hpp"
#include "prforge/config.hpp"
#include "prforge/denoiser.hpp"
#include "prforge/fourier.hpp"
#include "prforge/hio.hpp"
#include "prforge/image.hpp"
#include "prforge/initialization.hpp"
#include "prforge/langevin.hpp"
#include "prforge/measurement_io.hpp"
#include "prforge/metrics.hpp"
#include "prforge/png_io.hpp"
#include "prforge/reconstruct.hpp"
#include "prforge/rng.hpp"
#include "prforge/tta.hpp"
#include "prforge/weights.hpp"
