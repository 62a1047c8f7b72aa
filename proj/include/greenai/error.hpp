/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The greenai authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
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

#include <stdexcept>
#include <string>

namespace greenai {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid scenario configuration or malformed config file.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A requested operation has no feasible answer (e.g. N*U < K).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Exhaustive enumeration would exceed its configured budget.
class BudgetExceededError : public Error {
public:
    BudgetExceededError(double count, double budget)
        : Error("exhaustive search refused: " + std::to_string(count) +
                " assignments exceed budget " + std::to_string(budget)),
          count_(count), budget_(budget) {}

    double count() const noexcept { return count_; }
    double budget() const noexcept { return budget_; }

private:
    double count_;
    double budget_;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace greenai
