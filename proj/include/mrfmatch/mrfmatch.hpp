#pragma once

#include "mrfmatch/bp.hpp"
#include "mrfmatch/candidates.hpp"
#include "mrfmatch/core.hpp"
#include "mrfmatch/eval.hpp"
#include "mrfmatch/geometry.hpp"
#include "mrfmatch/graph.hpp"
#include "mrfmatch/io.hpp"
#include "mrfmatch/matchers.hpp"
#include "mrfmatch/oracle.hpp"
#include "mrfmatch/progressive.hpp"
#include "mrfmatch/random_graph.hpp"
#include "mrfmatch/spatial_index.hpp"
#include "mrfmatch/synth.hpp"
#include "mrfmatch/transform.hpp"
