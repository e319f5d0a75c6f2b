#include "tabgls/errors.hpp"

#include <fmt/format.h>

namespace tabgls {

ParseError::ParseError(std::string format, std::size_t line, std::size_t offset, std::string reason)
    : Error(fmt::format("{} parse error at line {}, offset {}: {}", format, line, offset, reason)),
      format_(std::move(format)),
      line_(line),
      offset_(offset),
      reason_(std::move(reason)) {}

}  // namespace tabgls
