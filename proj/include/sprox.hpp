#pragma once

#include "sprox/core.hpp"
#include "sprox/linalg.hpp"
#include "sprox/polyhedron.hpp"
#include "sprox/problem.hpp"
#include "sprox/generator.hpp"
#include "sprox/io.hpp"
#include "sprox/projection.hpp"
#include "sprox/params.hpp"
#include "sprox/constants.hpp"
#include "sprox/kfunction.hpp"
#include "sprox/certificate.hpp"
#include "sprox/qp_enumeration.hpp"
#include "sprox/solvers.hpp"
#include "sprox/potential.hpp"
#include "sprox/sprox_run.hpp"
#include "sprox/error_bounds.hpp"
#include "sprox/segments.hpp"
#include "sprox/rate.hpp"
#include "sprox/report.hpp"
#include "sprox/experiment.hpp"
