// Copyright (c) 2026 The qekit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QEKIT_CLI_HPP
#define QEKIT_CLI_HPP

namespace qekit::cli {

/// Dispatches one subcommand.  Returns 0 on success, 1 when a fit ran but
/// did not converge (the report is still written), 2 on usage, input or
/// format errors.
int run(int argc, const char* const* argv);

}  // namespace qekit::cli

#endif  // QEKIT_CLI_HPP
