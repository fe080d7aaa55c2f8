// SPDX-License-Identifier: Apache-2.0

#ifndef FEDGMR_COMMON_HPP
#define FEDGMR_COMMON_HPP

#include <stdexcept>
#include <string>

namespace fedgmr {

// Shape/dimension violations: mask length vs model length, non-nested
// increments, bad file magic.
class StructuralError : public std::runtime_error {
public:
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid knob values: nonpositive learning rate, batch larger than shard,
// ladder missing 1.0 with restoration enabled.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Violations of the client/server exchange contract: uploads from the
// future, missing clients in a synchronous aggregation.
class ProtocolError : public std::runtime_error {
public:
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fedgmr

#endif  // FEDGMR_COMMON_HPP
