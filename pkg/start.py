#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Startup script for the permcycle API server
"""

import os
import sys


def check_python_version():
    """Check if Python version is compatible."""
    if sys.version_info < (3, 9):
        print("❌ Error: Python 3.9 or higher is required")
        print(f"Current version: {sys.version}")
        return False
    print(f"✅ Python version: {sys.version}")
    return True


REQUIRED_PACKAGES = [
    ('numpy', 'numpy'),
    ('pandas', 'pandas'),
    ('mpmath', 'mpmath'),
    ('sympy', 'sympy'),
    ('rich', 'rich'),
    ('flask', 'flask'),
    ('flask-cors', 'flask_cors'),
]


def check_dependencies(packages=REQUIRED_PACKAGES):
    """Check if required dependencies are installed; returns the missing ones."""
    print("🔍 Checking dependencies...")

    missing_packages = []

    for package_name, import_name in packages:
        try:
            __import__(import_name)
            print(f"  ✅ {package_name}")
        except ImportError:
            print(f"  ❌ {package_name} (missing)")
            missing_packages.append(package_name)

    if missing_packages:
        print(f"\n⚠️ Missing packages: {', '.join(missing_packages)}")
        print("Install them with: pip3 install -r requirements.txt")
    return missing_packages


def start_web_server(port=None):
    """Start the API server."""
    port = port or int(os.environ.get('PORT', 8080))
    print("\n🚀 Starting permcycle API...")

    try:
        from api import app

        print(f"🌐 Listening on http://localhost:{port}")
        print(f"🩺 Health check: http://localhost:{port}/health")
        print("\nPress Ctrl+C to stop the server")

        app.run(host='0.0.0.0', port=port, debug=False)
        return True

    except ImportError as e:
        print(f"❌ Failed to import API: {e}")
        print("Make sure you're in the project directory and all dependencies are installed")
        return False
    except Exception as e:
        print(f"❌ Failed to start server: {e}")
        return False


def main():
    """Main startup function."""
    print("🔢 permcycle API - Startup")
    print("=" * 40)

    if not check_python_version():
        sys.exit(1)

    if check_dependencies():
        print("\n💡 To install dependencies, run:")
        print("   pip3 install -r requirements.txt")
        sys.exit(1)

    try:
        if not start_web_server():
            sys.exit(1)
    except KeyboardInterrupt:
        print("\n👋 Server stopped by user")


if __name__ == "__main__":
    try:
        main()
    except Exception as e:
        print(f"\n❌ Unexpected error: {e}")
        sys.exit(1)
