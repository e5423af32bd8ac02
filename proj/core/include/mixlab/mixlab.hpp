#pragma once

#include "mixlab/averaging.hpp"
#include "mixlab/certificates.hpp"
#include "mixlab/fft.hpp"
#include "mixlab/flows.hpp"
#include "mixlab/harness.hpp"
#include "mixlab/inviscid.hpp"
#include "mixlab/linalg.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/quadrature.hpp"
#include "mixlab/report.hpp"
#include "mixlab/shear_diffusion.hpp"
#include "mixlab/spectral.hpp"
