#include <gtest/gtest.h>

#include "porofeti/porofeti.hpp"
