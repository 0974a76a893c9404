#pragma once

#include "jsar/config.hpp"
#include "jsar/error.hpp"
#include "jsar/evaluation.hpp"
#include "jsar/features.hpp"
#include "jsar/geometry.hpp"
#include "jsar/image.hpp"
#include "jsar/plane.hpp"
#include "jsar/redetection.hpp"
#include "jsar/run_log.hpp"
#include "jsar/size_filter.hpp"
#include "jsar/spectral.hpp"
#include "jsar/synthetic.hpp"
#include "jsar/tracker.hpp"
#include "jsar/translation_filter.hpp"
