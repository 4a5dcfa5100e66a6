#pragma once

#include "agency/boolfn.hpp"
#include "agency/decomposition.hpp"
#include "agency/diagram.hpp"
#include "agency/error.hpp"
#include "agency/io.hpp"
#include "agency/network.hpp"
#include "agency/purity.hpp"
#include "agency/solver_mixed.hpp"
#include "agency/solver_pure.hpp"
#include "agency/technology.hpp"
