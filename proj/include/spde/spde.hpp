#pragma once

#include "spde/averaging.hpp"
#include "spde/constants.hpp"
#include "spde/integrator.hpp"
#include "spde/linear_ops.hpp"
#include "spde/model.hpp"
#include "spde/noise_engine.hpp"
#include "spde/parallel.hpp"
#include "spde/polynomial.hpp"
#include "spde/random.hpp"
#include "spde/spectral.hpp"
#include "spde/spectral_field.hpp"
#include "spde/stats.hpp"
#include "spde/config.hpp"
#include "spde/report.hpp"
#include "spde/studies.hpp"
