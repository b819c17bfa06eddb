#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Test script to verify installation and basic functionality.
"""

import importlib
import sys

MODULES = ['errors', 'config', 'exactnum', 'series', 'classes', 'fixpoints', 'permlab',
           'keeloq', 'costmodel', 'acceptance', 'cli', 'api']
STACK = ['numpy', 'pandas', 'mpmath', 'sympy', 'flask', 'flask_cors', 'rich']


def test_stack_imports():
    """The third-party stack is importable."""
    print("🔍 Testing dependency imports...")
    for name in STACK:
        importlib.import_module(name)
        print(f"  ✅ {name} imported successfully")

    from start import check_dependencies
    assert check_dependencies() == []


def test_module_imports():
    """Every permcycle module is importable."""
    print("\n🔍 Testing module imports...")
    for name in MODULES:
        importlib.import_module(name)
        print(f"  ✅ {name} imported successfully")


def test_basic_functionality():
    """A few small calculations end to end."""
    print("\n🧪 Testing basic functionality...")

    from classes import prob_derangement
    from exactnum import divisor_profile
    from keeloq import MiniParams, mini_decrypt, mini_encrypt

    assert prob_derangement(64).to_decimal(8) == '0.36787944'
    print("  ✅ Derangement limit computed")

    assert divisor_profile(1081080).tau == 256
    print("  ✅ Divisor profile computed")

    params = MiniParams.mini(12)
    assert mini_decrypt(mini_encrypt(0x5a5, 0x123456, params), 0x123456, params) == 0x5a5
    print("  ✅ 12-bit cipher round trip")


def test_api_import():
    """The Flask app answers its health check."""
    print("\n🌐 Testing API import...")
    from api import app
    with app.test_client() as client:
        assert client.get('/health').status_code == 200
    print("  ✅ Flask API imported successfully")


def main():
    """Run all tests."""
    print("🚀 permcycle - Installation Test")
    print("=" * 50)

    print(f"🐍 Python version: {sys.version}")
    if sys.version_info < (3, 9):
        print("  ⚠️ Warning: Python 3.9+ required")
    else:
        print("  ✅ Python version is compatible")

    tests = [
        ("Dependency Imports", test_stack_imports),
        ("Module Imports", test_module_imports),
        ("Basic Functionality", test_basic_functionality),
        ("API Import", test_api_import),
    ]

    results = []
    for test_name, test_func in tests:
        try:
            test_func()
            results.append((test_name, True))
        except Exception as e:
            print(f"  ❌ {test_name} failed with exception: {e}")
            results.append((test_name, False))

    print("\n📋 Test Summary")
    print("=" * 30)
    passed = sum(1 for _, ok in results if ok)
    for test_name, ok in results:
        print(f"  {test_name}: {'✅ PASS' if ok else '❌ FAIL'}")
    print(f"\n🎯 Results: {passed}/{len(results)} tests passed")

    if passed == len(results):
        print("🎉 All tests passed! The installation is working correctly.")
        print("\n🚀 You can now:")
        print("  - Start the web server: permcycle-server")
        print("  - Run the battery: permcycle paper-check --quick")
    else:
        print("⚠️ Some tests failed. Please check the error messages above.")
        print("  - Make sure all dependencies are installed: pip3 install -r requirements.txt")
    return passed == len(results)


if __name__ == "__main__":
    sys.exit(0 if main() else 1)
