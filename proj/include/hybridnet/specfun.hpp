#pragma once

#include "hybridnet/specfun/bell.hpp"
#include "hybridnet/specfun/gamma.hpp"
#include "hybridnet/specfun/hypergeometric.hpp"
#include "hybridnet/specfun/laplace.hpp"
#include "hybridnet/specfun/quadrature.hpp"
