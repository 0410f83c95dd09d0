// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace triage {

// Malformed or inconsistent input data (scenario files, tensor bundles,
// shape mismatches). CLI exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration (budgets, ratios, weights out of range).
// CLI exit code 3.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Internal consistency violation; indicates a bug upstream.
// CLI exit code 4.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace triage
