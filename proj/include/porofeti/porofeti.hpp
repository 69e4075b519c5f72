#pragma once

#include "porofeti/assembly.hpp"
#include "porofeti/config.hpp"
#include "porofeti/core.hpp"
#include "porofeti/elements.hpp"
#include "porofeti/feti.hpp"
#include "porofeti/io.hpp"
#include "porofeti/mesh.hpp"
#include "porofeti/model.hpp"
#include "porofeti/state.hpp"
#include "porofeti/timeloop.hpp"
#include "porofeti/verify.hpp"
