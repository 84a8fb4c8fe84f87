// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 MSS Contributors

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace mss {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed XML or a structurally invalid expression.
class ParseError : public Error {
 public:
  ParseError(std::string detail, std::size_t byte_offset, const std::string& context = {})
      : Error((context.empty() ? "" : context + ": ") + detail + " (at byte " +
              std::to_string(byte_offset) + ")"),
        detail_(std::move(detail)),
        offset_(byte_offset) {}

  const std::string& detail() const noexcept { return detail_; }
  std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

/// Well-formed markup using an element outside the supported Strict Content vocabulary.
class UnsupportedConstruct : public Error {
 public:
  UnsupportedConstruct(std::string element, std::size_t byte_offset, const std::string& context = {})
      : Error((context.empty() ? "" : context + ": ") + "unsupported construct <" + element +
              "> (at byte " + std::to_string(byte_offset) + ")"),
        element_(std::move(element)),
        offset_(byte_offset) {}

  const std::string& element() const noexcept { return element_; }
  std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::string element_;
  std::size_t offset_;
};

/// Invalid parameters, configuration files, or violated preconditions.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Inputs that load but cannot be used together (unreadable corpus, unmatched queries).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace mss
