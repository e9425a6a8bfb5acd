#pragma once

#include <string>

#include "gb/certificate.hpp"
#include "gb/cocycle.hpp"
#include "gb/conjugate_greens.hpp"
#include "gb/index_form.hpp"
#include "gb/riccati.hpp"
#include "gb/theorems.hpp"

namespace gb::reports {

/// Canonical JSON documents for every report type. Key order is sorted and
/// doubles round-trip, so identical inputs serialize to identical bytes.
std::string to_json(const GreenBundles& g);
std::string to_json(const ConjugateReport& r);
std::string to_json(const PositivityReport& r);
std::string to_json(const CocycleReport& r);
std::string to_json(const TheoremCReport& r);
std::string to_json(const TheoremAReport& r);
std::string to_json(const BoundCheck& c, const RiccatiBound& b);
std::string to_json(const BoundednessCertificate& c);

std::string verdict_name(HypVerdict v);

}  // namespace gb::reports
