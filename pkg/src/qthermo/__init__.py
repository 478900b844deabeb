# SPDX-License-Identifier: MIT


def qthermo():
    """Launch the qthermo scenario tool."""
    from . import scenario  # pylint: disable=import-outside-toplevel

    return scenario.main()


def launch_tool(tool_name):
    """Launch a tool with the given name and arguments."""
    tools = {
        "qthermo.py": qthermo,
    }
    if tool_name in tools:
        return tools[tool_name]()
    else:
        print(f"\033[91mUnknown exe: {tool_name}\033[0m")
        return 1
