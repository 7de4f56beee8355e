#ifndef RVW_RVW_HPP
#define RVW_RVW_HPP

#include "rvw/arch.hpp"
#include "rvw/bound.hpp"
#include "rvw/codebook.hpp"
#include "rvw/doc.hpp"
#include "rvw/dsl.hpp"
#include "rvw/encoder.hpp"
#include "rvw/error.hpp"
#include "rvw/graph.hpp"
#include "rvw/ledger.hpp"
#include "rvw/report.hpp"
#include "rvw/verify.hpp"

#endif  // RVW_RVW_HPP
