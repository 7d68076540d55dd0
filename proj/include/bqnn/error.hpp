/* Copyright 2026 The bqnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BQNN_ERROR_HPP_
#define BQNN_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace bqnn {

enum class ErrorCode {
  // container / graph structure
  Io,
  BadMagic,
  VersionUnsupported,
  TruncatedBlob,
  SchemaError,
  DanglingInput,
  CyclicGraph,
  // validation
  ValidationFailed,
  // lowering
  MarkerOnNonWeightEdge,
  NonFiniteWeight,
  NonAffineNodeInChain,
  ZeroScaleChannel,
  NonMonotoneActivation,
  UnfoldableSubgraph,
  AlreadyLowered,
  NotLowered,
  Overflow,
  // layout / packing
  AlreadyDepthInnermost,
  WrongLayout,
  WrongDtype,
  NonZeroPadBits,
  KernelDepthMismatch,
  // engine
  ShapeMismatch,
  LayoutMismatch,
  PlaneCountMismatch,
  ChannelMismatch,
  // accelerator model
  BudgetTooSmall,
  NoLegalPen,
  NotBinarizedLayer,
  // codegen / cli
  UnsupportedNode,
  UnknownArchitecture,
  Internal,
};

std::string_view to_string(ErrorCode code);

// Process exit status for a failure of this kind:
// 1 I/O and container decoding, 2 validation and unknown fixture names,
// 3 lowering and accelerator mapping, 4 internal.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bqnn

#endif  // BQNN_ERROR_HPP_
