#pragma once

#include "glasscape/critical.hpp"
#include "glasscape/experiments.hpp"
#include "glasscape/hamiltonian.hpp"
#include "glasscape/sampler.hpp"
