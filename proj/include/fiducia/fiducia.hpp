#pragma once

#include "fiducia/benchmark.hpp"
#include "fiducia/cf.hpp"
#include "fiducia/corpus.hpp"
#include "fiducia/error.hpp"
#include "fiducia/evalx.hpp"
#include "fiducia/fm.hpp"
#include "fiducia/fragmenter.hpp"
#include "fiducia/lstm.hpp"
#include "fiducia/pipeline.hpp"
#include "fiducia/sentiment_classic.hpp"
#include "fiducia/sides.hpp"
#include "fiducia/synth.hpp"
