#pragma once

// Umbrella header.

#include "revdetect/corpus.hpp"
#include "revdetect/error.hpp"
#include "revdetect/explain.hpp"
#include "revdetect/extraction.hpp"
#include "revdetect/learners.hpp"
#include "revdetect/markers.hpp"
#include "revdetect/metrics.hpp"
#include "revdetect/model.hpp"
#include "revdetect/report.hpp"
#include "revdetect/retrieve.hpp"
#include "revdetect/synthetic.hpp"
#include "revdetect/text.hpp"
#include "revdetect/validation.hpp"
