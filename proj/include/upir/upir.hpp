#pragma once

#include "upir/adversary.hpp"
#include "upir/anonymity.hpp"
#include "upir/cfg_format.hpp"
#include "upir/constructions.hpp"
#include "upir/errors.hpp"
#include "upir/incidence.hpp"
#include "upir/protocol.hpp"
#include "upir/random.hpp"
#include "upir/trace_io.hpp"
#include "upir/version.hpp"
