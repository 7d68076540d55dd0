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

#include "bqnn/error.hpp"

namespace bqnn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::TruncatedBlob: return "TruncatedBlob";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DanglingInput: return "DanglingInput";
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::MarkerOnNonWeightEdge: return "MarkerOnNonWeightEdge";
    case ErrorCode::NonFiniteWeight: return "NonFiniteWeight";
    case ErrorCode::NonAffineNodeInChain: return "NonAffineNodeInChain";
    case ErrorCode::ZeroScaleChannel: return "ZeroScaleChannel";
    case ErrorCode::NonMonotoneActivation: return "NonMonotoneActivation";
    case ErrorCode::UnfoldableSubgraph: return "UnfoldableSubgraph";
    case ErrorCode::AlreadyLowered: return "AlreadyLowered";
    case ErrorCode::NotLowered: return "NotLowered";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::AlreadyDepthInnermost: return "AlreadyDepthInnermost";
    case ErrorCode::WrongLayout: return "WrongLayout";
    case ErrorCode::WrongDtype: return "WrongDtype";
    case ErrorCode::NonZeroPadBits: return "NonZeroPadBits";
    case ErrorCode::KernelDepthMismatch: return "KernelDepthMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::PlaneCountMismatch: return "PlaneCountMismatch";
    case ErrorCode::ChannelMismatch: return "ChannelMismatch";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::NoLegalPen: return "NoLegalPen";
    case ErrorCode::NotBinarizedLayer: return "NotBinarizedLayer";
    case ErrorCode::UnsupportedNode: return "UnsupportedNode";
    case ErrorCode::UnknownArchitecture: return "UnknownArchitecture";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::BadMagic:
    case ErrorCode::VersionUnsupported:
    case ErrorCode::TruncatedBlob:
    case ErrorCode::SchemaError:
    case ErrorCode::DanglingInput:
    case ErrorCode::CyclicGraph:
      return 1;
    case ErrorCode::ValidationFailed:
    case ErrorCode::UnknownArchitecture:
      return 2;
    case ErrorCode::MarkerOnNonWeightEdge:
    case ErrorCode::NonFiniteWeight:
    case ErrorCode::NonAffineNodeInChain:
    case ErrorCode::ZeroScaleChannel:
    case ErrorCode::NonMonotoneActivation:
    case ErrorCode::UnfoldableSubgraph:
    case ErrorCode::AlreadyLowered:
    case ErrorCode::NotLowered:
    case ErrorCode::Overflow:
    case ErrorCode::NoLegalPen:
    case ErrorCode::BudgetTooSmall:
    case ErrorCode::UnsupportedNode:
      return 3;
    default:
      return 4;
  }
}

}  // namespace bqnn
