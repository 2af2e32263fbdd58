#pragma once

#include "ore/attacks.hpp"
#include "ore/bounds.hpp"
#include "ore/constraints.hpp"
#include "ore/cost.hpp"
#include "ore/errors.hpp"
#include "ore/hitting_set.hpp"
#include "ore/model.hpp"
#include "ore/mus.hpp"
#include "ore/text.hpp"
#include "ore/verifier.hpp"
#include "ore/word_set.hpp"
