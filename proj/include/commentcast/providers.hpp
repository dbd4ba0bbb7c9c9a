#pragma once

#include "commentcast/providers/cache.hpp"
#include "commentcast/providers/engine.hpp"
#include "commentcast/providers/offline.hpp"
#include "commentcast/providers/providers.hpp"
