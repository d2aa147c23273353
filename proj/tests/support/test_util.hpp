/*
 * Copyright 2026 The rapls Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <doctest.h>

#include <optional>

#include "rapls/errors.hpp"

/// Kind of the rapls::Error thrown by f, or nullopt when nothing is thrown.
template <typename F>
std::optional<rapls::ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const rapls::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

#define CHECK_THROWS_KIND(expr, kind_value) \
  CHECK(thrown_kind([&] { (void)(expr); }) == std::optional<rapls::ErrorKind>(kind_value))
