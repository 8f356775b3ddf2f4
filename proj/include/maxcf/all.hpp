#pragma once

#include "maxcf/characteristic.hpp"
#include "maxcf/dnorm.hpp"
#include "maxcf/error.hpp"
#include "maxcf/experiments.hpp"
#include "maxcf/inversion.hpp"
#include "maxcf/model_spec.hpp"
#include "maxcf/models.hpp"
#include "maxcf/quadrature.hpp"
#include "maxcf/random.hpp"
#include "maxcf/sample.hpp"
#include "maxcf/special.hpp"
#include "maxcf/transport.hpp"
