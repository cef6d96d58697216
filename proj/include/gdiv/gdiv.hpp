#pragma once

#include "gdiv/error.hpp"
#include "gdiv/parallel.hpp"
#include "gdiv/numeric.hpp"
#include "gdiv/gaussint.hpp"
#include "gdiv/arith.hpp"
#include "gdiv/expsum.hpp"
#include "gdiv/fft.hpp"
#include "gdiv/circle.hpp"
#include "gdiv/operators.hpp"
#include "gdiv/report.hpp"
