#pragma once

// Umbrella header for the GMD fragment pair-matching toolkit.

#include "gmd/alignment.hpp"
#include "gmd/core.hpp"
#include "gmd/descriptor.hpp"
#include "gmd/gmm.hpp"
#include "gmd/kdtree.hpp"
#include "gmd/keypoints.hpp"
#include "gmd/lrf.hpp"
#include "gmd/matching.hpp"
#include "gmd/metrics.hpp"
#include "gmd/pipeline.hpp"
#include "gmd/ply_io.hpp"
#include "gmd/point_cloud.hpp"
#include "gmd/regions.hpp"
#include "gmd/synth.hpp"
#include "gmd/xmeans.hpp"
