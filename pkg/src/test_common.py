#!/usr/bin/python3
# SPDX-License-Identifier: MIT

"""
This module contains unit tests for the common functions in the quantum-thermo-tools package.
"""
from unittest.mock import patch

import logging
import os
import subprocess
import tempfile
import unittest

from qthermo.common import (
    Colors,
    ThermoTool,
    _configure_log,
    apply_prefix_wrapper,
    fatal_error,
    clear_temporary_message,
    get_group_color,
    print_color,
    print_temporary_message,
    show_log_info,
    version,
    write_file,
)

color_dict = {
    "🚦": Colors.WARNING,
    "🦟": Colors.DEBUG,
    "❌": Colors.FAIL,
    "👀": Colors.FAIL,
    "✅": Colors.OK,
    "○": Colors.OK,
    "🌡️": Colors.OK,
    "⚛️": Colors.OK,
    "💯": Colors.UNDERLINE,
    "🚫": Colors.UNDERLINE,
    "🗣️": Colors.HEADER,
}


class TestCommon(unittest.TestCase):
    """Test common functions"""

    @classmethod
    def setUpClass(cls):
        logging.basicConfig(filename="/dev/null", level=logging.DEBUG)

    def test_group_color(self):
        """Test that unknown groups are used as the color"""
        for group, color in color_dict.items():
            self.assertEqual(get_group_color(group), color)
        self.assertEqual(get_group_color(Colors.FAIL), Colors.FAIL)

    @patch("builtins.print")
    def test_print_color(self, mocked_print):
        """Test print_color function for all expected levels"""
        message = "foo"
        # test all color groups
        with patch.dict(os.environ, {"TERM": "xterm"}):
            for group, color in color_dict.items():
                prefix = f"{group} "
                print_color(message, group)
                mocked_print.assert_called_once_with(f"{prefix}{color}{message}{Colors.ENDC}")
                mocked_print.reset_mock()

            # call without a group
            print_color(message, Colors.WARNING)
            mocked_print.assert_called_once_with(f"{Colors.WARNING}{message}{Colors.ENDC}")
            mocked_print.reset_mock()

        # test dumb terminal
        with patch.dict(os.environ, {"TERM": "dumb"}):
            print_color(message, Colors.WARNING)
            mocked_print.assert_called_once_with(f"{message}")

    @patch("builtins.print")
    def test_fatal_error(self, mocked_print):
        """Test fatal_error function"""
        with patch("sys.exit") as mock_exit, patch.dict(os.environ, {"TERM": "xterm"}):
            fatal_error("foo")
            mocked_print.assert_called_once_with(f"👀 {Colors.FAIL}foo{Colors.ENDC}")
            mock_exit.assert_called_once_with(1)

    def test_apply_prefix_wrapper(self):
        """Test apply_prefix_wrapper function"""
        header = "Header:"
        message = "necessary.rho_dot\nsufficient.canonical\ncomplementary.commutator"
        expected_output = (
            "Header:\n"
            "│ necessary.rho_dot\n"
            "│ sufficient.canonical\n"
            "└─ complementary.commutator\n"
        )
        self.assertEqual(apply_prefix_wrapper(header, message), expected_output)

        # Test with a single line message
        message = "Single Line"
        expected_output = "Header:\n└─ Single Line\n"
        self.assertEqual(apply_prefix_wrapper(header, message), expected_output)

        # Test with an empty message
        self.assertEqual(apply_prefix_wrapper(header, ""), "Header:\n")

        # Test with leading/trailing whitespace in the message
        message = "  Line 1\nLine 2  \n  Line 3  "
        expected_output = "Header:\n" "│ Line 1\n" "│ Line 2\n" "└─ Line 3\n"
        self.assertEqual(apply_prefix_wrapper(header, message), expected_output)

    @patch("builtins.print")
    def test_temporary_message(self, mocked_print):
        """Test that a temporary message is blanked with as many spaces"""
        length = print_temporary_message("working")
        self.assertEqual(length, 7)
        clear_temporary_message(length)
        mocked_print.assert_called_with("       ", end="\r")

    def test_write_file(self):
        """Test writing a file"""
        with tempfile.TemporaryDirectory() as tmp:
            fname = os.path.join(tmp, "out.csv")
            write_file(fname, "t,E\n0,1\n")
            with open(fname, encoding="utf-8") as f:
                self.assertEqual(f.read(), "t,E\n0,1\n")
            write_file(fname, "t\n")
            with open(fname, encoding="utf-8") as f:
                self.assertEqual(f.read(), "t\n")

    def test_write_file_symlink(self):
        """Test that a symlink at the destination is refused"""
        with tempfile.TemporaryDirectory() as tmp:
            target = os.path.join(tmp, "target")
            link = os.path.join(tmp, "link")
            with open(target, "w", encoding="utf-8") as f:
                f.write("keep")
            os.symlink(target, link)
            with self.assertRaises(OSError):
                write_file(link, "overwrite")
            with open(target, encoding="utf-8") as f:
                self.assertEqual(f.read(), "keep")

    @patch("qthermo.common.subprocess.check_output", side_effect=FileNotFoundError)
    @patch("qthermo.common.importlib.metadata.version", return_value="1.2.3")
    def test_version(self, _mock_version, _mock_git):
        """Test the version without git"""
        self.assertEqual(version(), "1.2.3")

    @patch("qthermo.common.subprocess.check_output", return_value='commit abc1234 ("foo")\n')
    @patch("qthermo.common.importlib.metadata.version", return_value="1.2.3")
    def test_version_git(self, _mock_version, _mock_git):
        """Test the version with a git checkout"""
        self.assertEqual(version(), '1.2.3 [commit abc1234 ("foo")]')

    @patch(
        "qthermo.common.subprocess.check_output",
        side_effect=subprocess.CalledProcessError(128, "git"),
    )
    def test_version_not_a_checkout(self, _mock_git):
        """Test the version outside a git checkout"""
        self.assertNotIn("[", version())

    def test_configure_log_keeps_handlers(self):
        """Test that existing handlers are kept"""
        self.assertIsNone(_configure_log("qthermo"))

    @patch("builtins.print")
    def test_show_log_info(self, mocked_print):
        """Test that /dev/null is not announced"""
        show_log_info()
        mocked_print.assert_not_called()

    def test_tool(self):
        """Test the tool base class"""
        tool = ThermoTool(None)
        self.assertIsNone(tool.log)


class TestConfigureLog(unittest.TestCase):
    """Test configuring the log file"""

    def setUp(self):
        self.handlers = logging.root.handlers[:]
        self.level = logging.root.level
        logging.root.handlers = []

    def tearDown(self):
        for handler in logging.root.handlers:
            handler.close()
        logging.root.handlers = self.handlers
        logging.root.setLevel(self.level)

    def test_without_prefix(self):
        """Test that no prefix discards the log"""
        self.assertEqual(_configure_log(None), "/dev/null")
        self.assertEqual(logging.root.level, logging.WARNING)

    def test_with_prefix(self):
        """Test that a prefix writes a dated debug log"""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "logs")
            with patch.dict(os.environ, {"XDG_DATA_HOME": path}):
                log = _configure_log("qthermo")
            self.assertTrue(os.path.basename(log).startswith("qthermo-"))
            self.assertEqual(os.path.dirname(log), path)
            self.assertTrue(os.path.isdir(path))
            self.assertEqual(logging.root.level, logging.DEBUG)
            for handler in logging.root.handlers:
                handler.close()
            logging.root.handlers = []

    def test_symlinked_directory(self):
        """Test that a symlinked log directory is not used"""
        with tempfile.TemporaryDirectory() as tmp:
            real = os.path.join(tmp, "real")
            os.makedirs(real)
            link = os.path.join(tmp, "link")
            os.symlink(real, link)
            with patch.dict(os.environ, {"XDG_DATA_HOME": link}):
                self.assertEqual(_configure_log("qthermo"), "/dev/null")
