#pragma once

#include "glasscape/classify.hpp"
#include "glasscape/complexity.hpp"
#include "glasscape/errors.hpp"
#include "glasscape/io.hpp"
#include "glasscape/mixture.hpp"
#include "glasscape/montecarlo.hpp"
#include "glasscape/paircomplexity.hpp"
#include "glasscape/semicircle.hpp"
#include "glasscape/thermo.hpp"
#include "glasscape/version.hpp"
