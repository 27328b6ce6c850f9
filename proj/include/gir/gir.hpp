#pragma once

#include "gir/error.hpp"
#include "gir/evaluation.hpp"
#include "gir/index_core.hpp"
#include "gir/query_engine.hpp"
#include "gir/ranking_models.hpp"
#include "gir/text_analysis.hpp"
#include "gir/trec_io.hpp"
