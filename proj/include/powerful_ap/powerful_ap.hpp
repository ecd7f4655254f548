#pragma once

#include "powerful_ap/abcver.hpp"
#include "powerful_ap/constructions.hpp"
#include "powerful_ap/decimal.hpp"
#include "powerful_ap/errors.hpp"
#include "powerful_ap/factorize.hpp"
#include "powerful_ap/natural.hpp"
#include "powerful_ap/pell.hpp"
#include "powerful_ap/primality.hpp"
#include "powerful_ap/search.hpp"
#include "powerful_ap/witness.hpp"
