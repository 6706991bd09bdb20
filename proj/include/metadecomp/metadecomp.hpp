#pragma once

#include "metadecomp/caps.hpp"
#include "metadecomp/database.hpp"
#include "metadecomp/enumerate.hpp"
#include "metadecomp/error.hpp"
#include "metadecomp/hypergraph.hpp"
#include "metadecomp/io.hpp"
#include "metadecomp/join_tree.hpp"
#include "metadecomp/meta_decomposition.hpp"
#include "metadecomp/optimizer.hpp"
#include "metadecomp/oracle.hpp"
#include "metadecomp/plan.hpp"
#include "metadecomp/sets.hpp"
#include "metadecomp/workload.hpp"
