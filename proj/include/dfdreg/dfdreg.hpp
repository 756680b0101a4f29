#pragma once

#include "dfdreg/cli.hpp"
#include "dfdreg/config.hpp"
#include "dfdreg/dfd.hpp"
#include "dfdreg/filters.hpp"
#include "dfdreg/frames.hpp"
#include "dfdreg/io.hpp"
#include "dfdreg/operators.hpp"
#include "dfdreg/rates.hpp"
#include "dfdreg/regularize.hpp"
#include "dfdreg/rng.hpp"
#include "dfdreg/version.hpp"
