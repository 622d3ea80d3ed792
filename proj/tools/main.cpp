// SPDX-FileCopyrightText: 2026 The cmadiff authors
// SPDX-License-Identifier: Apache-2.0

#include "cmadiff/cmadiff.h"

int main(int argc, char** argv) { return cmadiff_main(argc, argv); }
