// Catch2 v3 amalgamated implementation (provides main).
#include <catch2/catch_amalgamated.cpp>
