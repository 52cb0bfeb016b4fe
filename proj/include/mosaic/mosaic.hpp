#pragma once

#include "mosaic/clusterer.hpp"
#include "mosaic/coherence.hpp"
#include "mosaic/corpus.hpp"
#include "mosaic/csv.hpp"
#include "mosaic/embedder.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/labeler.hpp"
#include "mosaic/matrix.hpp"
#include "mosaic/pipeline.hpp"
#include "mosaic/reducer.hpp"
#include "mosaic/report.hpp"
#include "mosaic/rng.hpp"
#include "mosaic/search.hpp"
#include "mosaic/serialize.hpp"
#include "mosaic/stopwords.hpp"
#include "mosaic/synthetic.hpp"
#include "mosaic/text.hpp"
#include "mosaic/tokenize.hpp"
#include "mosaic/topics.hpp"
#include "mosaic/version.hpp"
