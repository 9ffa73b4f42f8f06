/*
 * Copyright 2026 The Forge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace forge {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidExtrinsics : public Error {
 public:
  using Error::Error;
};

class InvalidDirection : public Error {
 public:
  using Error::Error;
};

class NonFiniteInput : public Error {
 public:
  using Error::Error;
};

/// Geometry that has no defined answer (bearing of a point straight above
/// the camera, distance ratio against a zero distance, ...).
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed record in a line-delimited file. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A record that parsed but breaks a data-model invariant.
class ValidationError : public Error {
 public:
  ValidationError(std::string scene_id, std::string field, const std::string& what)
      : Error("scene '" + scene_id + "', field '" + field + "': " + what),
        scene_id_(std::move(scene_id)),
        field_(std::move(field)) {}
  const std::string& scene_id() const noexcept { return scene_id_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string scene_id_;
  std::string field_;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class Conflict : public Error {
 public:
  using Error::Error;
};

class NotApplicable : public Error {
 public:
  using Error::Error;
};

}  // namespace forge
