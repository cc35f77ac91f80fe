#include "morl/env.hpp"

#include <string>

namespace morl {

StateEncoding parse_encoding(const std::string& name) {
  if (name == "one-hot") return StateEncoding::OneHot;
  if (name == "coordinate") return StateEncoding::Coordinate;
  if (name == "grid-image") return StateEncoding::GridImage;
  throw ConfigError("unknown state encoding: " + name);
}

}  // namespace morl
