#pragma once

// Umbrella header for the two-person interaction recognition library.

#include "duet/error.hpp"
#include "duet/eval.hpp"
#include "duet/features.hpp"
#include "duet/hungarian.hpp"
#include "duet/keypoints.hpp"
#include "duet/pose.hpp"
#include "duet/sbu.hpp"
#include "duet/svm.hpp"
#include "duet/synthetic.hpp"
#include "duet/tracker.hpp"
#include "duet/tracker_io.hpp"
