#pragma once

#include "tsymp/sympnet.hpp"

#include <iosfwd>
#include <string>

namespace tsymp {

/// Text checkpoint: a header describing the architecture followed by named
/// tensors ("tensor <name> <rows> <cols>") with hexfloat entries, so a
/// save/load round trip is bit-exact.
void save_checkpoint(const TlSympNet& net, std::ostream& out);
TlSympNet load_checkpoint(std::istream& in);

void save_checkpoint_file(const TlSympNet& net, const std::string& path);
TlSympNet load_checkpoint_file(const std::string& path);

}  // namespace tsymp
