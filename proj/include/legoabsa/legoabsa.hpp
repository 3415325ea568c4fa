#pragma once

#include "legoabsa/error.hpp"
#include "legoabsa/text.hpp"
#include "legoabsa/core.hpp"
#include "legoabsa/codecs.hpp"
#include "legoabsa/prompts.hpp"
#include "legoabsa/instance.hpp"
#include "legoabsa/json_io.hpp"
#include "legoabsa/datasets.hpp"
#include "legoabsa/backend.hpp"
#include "legoabsa/http_backend.hpp"
#include "legoabsa/eval.hpp"
#include "legoabsa/analysis.hpp"
#include "legoabsa/pipeline.hpp"
