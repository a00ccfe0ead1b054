#pragma once

#include "dnkpp/assumptions.hpp"
#include "dnkpp/bounds.hpp"
#include "dnkpp/config.hpp"
#include "dnkpp/convolution.hpp"
#include "dnkpp/dispersion.hpp"
#include "dnkpp/errors.hpp"
#include "dnkpp/evolution.hpp"
#include "dnkpp/front_analysis.hpp"
#include "dnkpp/grid.hpp"
#include "dnkpp/kernel.hpp"
#include "dnkpp/parallel.hpp"
#include "dnkpp/params.hpp"
#include "dnkpp/picard.hpp"
#include "dnkpp/quadrature.hpp"
#include "dnkpp/runner.hpp"
#include "dnkpp/waves.hpp"
