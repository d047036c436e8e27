#ifndef MSGD_MSGD_HPP
#define MSGD_MSGD_HPP

#include "msgd/bounds.hpp"
#include "msgd/config.hpp"
#include "msgd/error.hpp"
#include "msgd/experiments.hpp"
#include "msgd/io.hpp"
#include "msgd/linalg.hpp"
#include "msgd/masking.hpp"
#include "msgd/oracle.hpp"
#include "msgd/problem.hpp"
#include "msgd/random.hpp"
#include "msgd/solver.hpp"
#include "msgd/trace.hpp"

#endif  // MSGD_MSGD_HPP
