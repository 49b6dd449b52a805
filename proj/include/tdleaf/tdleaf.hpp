#pragma once

#include "tdleaf/config.hpp"
#include "tdleaf/core.hpp"
#include "tdleaf/eval.hpp"
#include "tdleaf/games/connect4.hpp"
#include "tdleaf/games/dice_race.hpp"
#include "tdleaf/games/explicit_tree.hpp"
#include "tdleaf/games/minichess.hpp"
#include "tdleaf/games/tictactoe.hpp"
#include "tdleaf/harness.hpp"
#include "tdleaf/oracles.hpp"
#include "tdleaf/rating.hpp"
#include "tdleaf/search.hpp"
#include "tdleaf/solver.hpp"
#include "tdleaf/td.hpp"
#include "tdleaf/verify.hpp"
