#pragma once

#include "constants.hpp"
#include "errors.hpp"
#include "params.hpp"
#include "linalg.hpp"
#include "operators.hpp"
#include "spectrum.hpp"
#include "special.hpp"
#include "qutrit.hpp"
#include "rates.hpp"
#include "experiments.hpp"
#include "io.hpp"
