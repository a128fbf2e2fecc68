#pragma once

#include "collab/errors.hpp"
#include "collab/numerics.hpp"
#include "collab/rng.hpp"
#include "collab/sdp.hpp"
#include "collab/model.hpp"
#include "collab/operators.hpp"
#include "collab/cumulative.hpp"
#include "collab/individual.hpp"
#include "collab/metrics.hpp"
#include "collab/parallel.hpp"
#include "collab/designer.hpp"
#include "collab/scenario_io.hpp"
#include "collab/harness.hpp"
