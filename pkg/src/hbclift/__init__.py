"""Static analysis toolkit for Hermes bytecode disassembly.

Lifts textual disassembly into a three-address IR, extracts Android-side
native module bindings from a class model, links both sides into one call
graph, and runs source/sink taint queries over it.
"""

__version__ = "0.1.0"
