#pragma once

#include "has/boundaries.hpp"
#include "has/error.hpp"
#include "has/eval.hpp"
#include "has/image.hpp"
#include "has/io.hpp"
#include "has/merge_filter.hpp"
#include "has/peak_detect.hpp"
#include "has/pipeline.hpp"
#include "has/synth.hpp"
