#pragma once

#include "commentcast/ingest/danmu.hpp"
#include "commentcast/ingest/envelope.hpp"
#include "commentcast/ingest/keyframes.hpp"
#include "commentcast/ingest/srt.hpp"
#include "commentcast/ingest/types.hpp"
#include "commentcast/ingest/wav.hpp"
