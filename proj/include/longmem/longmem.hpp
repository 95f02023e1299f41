#pragma once

#include "longmem/core.hpp"
#include "longmem/spectral.hpp"
#include "longmem/processes.hpp"
#include "longmem/estimation.hpp"
#include "longmem/fou_test.hpp"
#include "longmem/classic_tests.hpp"
#include "longmem/montecarlo.hpp"
#include "longmem/io.hpp"
