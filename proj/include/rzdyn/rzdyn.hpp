#pragma once

#include "classlat.hpp"
#include "ratmap.hpp"
#include "spectral.hpp"
#include "toric.hpp"
