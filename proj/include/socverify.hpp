#pragma once

#include "socverify/errors.hpp"
#include "socverify/linalg.hpp"
#include "socverify/problem.hpp"
#include "socverify/grid.hpp"
#include "socverify/ode.hpp"
#include "socverify/quadrature.hpp"
#include "socverify/trajectories.hpp"
#include "socverify/validation.hpp"
#include "socverify/builtins.hpp"
#include "socverify/pmp.hpp"
#include "socverify/families.hpp"
#include "socverify/relaxation.hpp"
#include "socverify/soc.hpp"
#include "socverify/parallel.hpp"
#include "socverify/report.hpp"
#include "socverify/pipeline.hpp"
